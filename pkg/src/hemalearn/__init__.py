"""hemalearn: from-scratch ML toolkit and experiment runner for binary
severity classification of blood-panel records."""

__version__ = "0.1.0"
