# Presence of this file puts tests/ on sys.path so tests can import util.
