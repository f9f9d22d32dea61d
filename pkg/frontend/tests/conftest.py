import os

# headless rendering for every test in this package; must be set before the
# first pyplot import anywhere in the process
os.environ.setdefault("MPLBACKEND", "Agg")
