import pandas as pd
import csv
import json

def load_table(path):
    return pd.read_csv(path)

def save_rows(rows, path):
    with open(path, 'w') as fh:
        json.dump(rows, fh)
