import random
import numpy, sys

def pick(items, k):
    return random.sample(items, k)

def main(argv):
    data = [int(x) for x in argv]
    return numpy.mean(data)
