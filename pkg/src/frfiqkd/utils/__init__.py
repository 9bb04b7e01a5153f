# 工具模块
