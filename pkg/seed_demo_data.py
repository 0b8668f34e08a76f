"""
Demo data seeder - writes the bundled synthetic trial used as the default dataset.
Run: python seed_demo_data.py
"""
import sys, os
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import logging

from hurdlecea.config import settings
from hurdlecea.synth import DEMO_ARM_SIZES, DEMO_SEED, case_study_truth
from hurdlecea.workflow import run_simulate

logging.basicConfig(level=logging.INFO, format="%(asctime)s [%(levelname)s] %(name)s: %(message)s")
logger = logging.getLogger(__name__)


def seed():
    path = run_simulate(case_study_truth(), DEMO_ARM_SIZES, DEMO_SEED, settings.DEFAULT_DATASET)
    logger.info(f"Bundled dataset ready: {path} ({sum(DEMO_ARM_SIZES)} records)")


if __name__ == "__main__":
    seed()
