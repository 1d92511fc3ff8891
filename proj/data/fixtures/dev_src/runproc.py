import subprocess
import os

def run_quiet(cmd):
    return subprocess.run(cmd, capture_output=True)
