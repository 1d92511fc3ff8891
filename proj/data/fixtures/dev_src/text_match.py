import re
import string

def leading_number(line):
    m = re.match(r'\d+', line)
    return m.group(0) if m else ''

def normalize(text):
    return text.strip().lower()
