import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# Per-(city, topic) parameter grid from the wildfire case study used as
# ground truth for forward-simulation tests: (location, topic, beta, gamma, N).
CITY_TOPIC_PARAMS = [
    ("Portland", "health impact", 2.65, 2.04, 12423),
    ("Portland", "evacuation", 2.78, 2.02, 12423),
    ("Portland", "damage", 3.18, 2.53, 12423),
    ("Portland", "humanitarian aid", 4.01, 3.59, 12423),
    ("Portland", "recovery", 12.68, 10.84, 12423),
    ("Portland", "monitoring", 8.58, 8.00, 12423),
    ("Seattle", "health impact", 2.15, 1.23, 6539),
    ("Seattle", "evacuation", 3.88, 3.42, 6539),
    ("Seattle", "damage", 2.37, 1.51, 6539),
    ("Seattle", "humanitarian aid", 4.23, 4.07, 6539),
    ("Seattle", "recovery", 9.09, 8.30, 6539),
    ("Seattle", "monitoring", 5.37, 4.94, 6539),
    ("Los Angeles", "health impact", 3.36, 2.69, 6543),
    ("Los Angeles", "evacuation", 2.18, 1.91, 6543),
    ("Los Angeles", "damage", 1.16, 0.91, 6543),
    ("Los Angeles", "humanitarian aid", 5.67, 5.24, 6543),
    ("Los Angeles", "recovery", 3.53, 3.16, 6543),
    ("Los Angeles", "monitoring", 3.98, 3.66, 6543),
    ("Salem", "health impact", 4.22, 3.39, 436),
    ("Salem", "evacuation", 2.36, 1.45, 436),
    ("Salem", "damage", 2.16, 1.21, 436),
    ("Salem", "humanitarian aid", 1.46, 1.28, 436),
]

# Decaying rows: zero infection rate, positive recovery rate.
CITY_TOPIC_DECAY = [
    ("Salem", "recovery", 0.00, 0.07, 436),
    ("Salem", "monitoring", 0.00, 0.08, 436),
]
