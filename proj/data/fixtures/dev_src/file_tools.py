import os
import shutil
from os.path import join

def backup(src, dst_dir):
    name = os.path.basename(src)
    shutil.copy(src, join(dst_dir, name))
    return True
