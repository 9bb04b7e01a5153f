# FRFI-QKD测试包
