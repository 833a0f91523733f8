# ============================================================================
# config.py (budgets, thresholds and logging settings)
# ============================================================================
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

class Config:
    VERSION = '0.1.0'

    LOG_LEVEL = os.environ.get('QM_LOG_LEVEL', 'INFO').upper()
    LOG_FILE = os.environ.get('QM_LOG_FILE')  # stderr only when unset
    OUTPUT_DIR = os.environ.get('QM_OUTPUT_DIR', 'artifacts')

    # Resource budgets
    MAX_VERTICES = int(os.environ.get('QM_MAX_VERTICES', 250000))
    MAX_GROUP_ELEMENTS = int(os.environ.get('QM_MAX_GROUP_ELEMENTS', 500000))
    WALK_BUDGET_CAP = int(os.environ.get('QM_BUDGET_CAP', 4096))
    MAX_PRODUCT_NODES = int(os.environ.get('QM_MAX_PRODUCT_NODES', 2000000))
    ORACLE_MAX_WALKS = int(os.environ.get('QM_ORACLE_MAX_WALKS', 2000000))

    RANDOM_SEED = int(os.environ.get('QM_SEED', 0))

    # Numerical defaults
    HYPERBOLICITY_THRESHOLD = float(os.environ.get('QM_HYPERBOLICITY_THRESHOLD', 0.5))
    DEFAULT_W = 1
    SCHEDULE_RATIO = 4
