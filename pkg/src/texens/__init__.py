"""Texture descriptors, feature-transform augmentation, and SVM score fusion
for bioimage classification benchmarks."""

__version__ = "0.1.0"
