# 数据模块
