import collections
import itertools

def tally(items):
    return collections.Counter(items)

def pairs(items):
    return list(itertools.combinations(items, 2))
