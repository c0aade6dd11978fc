import pathlib
import sys

# Allow running the suite from a fresh checkout without an editable install.
_SRC = pathlib.Path(__file__).resolve().parents[1] / "src"
if str(_SRC) not in sys.path:
    sys.path.insert(0, str(_SRC))
