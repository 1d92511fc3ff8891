import numpy as np
import math

def scale(values, factor):
    arr = np.array(values)
    return arr * factor

def magnitude(x, y):
    return math.sqrt(x ** 2 + y ** 2)
