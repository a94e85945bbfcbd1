import os
import sys

# Feature folders are imported from the repository root
sys.path.insert(0, os.path.dirname(__file__))
