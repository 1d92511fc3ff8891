from pathlib import Path
import os.path

def siblings(path):
    return sorted(Path(path).parent.iterdir())
