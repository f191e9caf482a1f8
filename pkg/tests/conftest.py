import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# fixture files are addressed relative to the repository root
os.chdir(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
