from pathlib import Path

# Project root directory
PROJECT_ROOT = Path(__file__).resolve().parents[1]

# -------------------- OUTPUT PATHS --------------------

# Bare file names given to --output land here
OUTPUT_DIR = PROJECT_ROOT / "outputs"

# -------------------- ENVIRONMENT --------------------

ENV_FILE = PROJECT_ROOT / ".env"
