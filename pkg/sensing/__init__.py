# -*- coding: utf-8 -*-
'''
稀疏恢复的数学部分：测量矩阵、误差界、预言量、几何性质与信号模型

各子模块按需导入，例如 from sensing.measurement import coherence
'''
