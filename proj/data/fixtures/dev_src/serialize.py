import pickle
import json
from functools import reduce

def roundtrip(obj):
    return pickle.loads(pickle.dumps(obj))
