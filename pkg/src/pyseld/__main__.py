"""python -m pyseld"""
import sys

from pyseld.cli import main

sys.exit(main())
