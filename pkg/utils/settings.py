"""
Runtime settings read from the environment (and an optional .env file).
"""
import os

from dotenv import load_dotenv

load_dotenv()

APFIRE_THREADS = max(1, int(os.environ.get("APFIRE_THREADS", "1")))
APFIRE_LOG_LEVEL = os.environ.get("APFIRE_LOG_LEVEL", "WARNING")

DEFAULT_SCAN_STEP = float(os.environ.get("APFIRE_SCAN_STEP", "1e-3"))
DEFAULT_TIME_TOL = float(os.environ.get("APFIRE_TIME_TOL", "1e-10"))
DEFAULT_QUAD_TOL = float(os.environ.get("APFIRE_QUAD_TOL", "1e-10"))
DEFAULT_HORIZON = float(os.environ.get("APFIRE_HORIZON", "1e3"))
