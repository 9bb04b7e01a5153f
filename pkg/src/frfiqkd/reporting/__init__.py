# 输出模块
