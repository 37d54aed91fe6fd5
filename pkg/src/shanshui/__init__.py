"""Sketch-to-shanshui painting pipeline.

Dataset synthesis from painting scans, unpaired sketch/painting
translation training, and an interactive drawing service.
"""

__version__ = "0.1.0"
