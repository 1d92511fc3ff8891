import datetime
from datetime import timedelta

def tomorrow():
    return datetime.date.today() + timedelta(days=1)
