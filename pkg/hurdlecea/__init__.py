"""
hurdlecea: Bayesian hurdle models for cost-effectiveness data with structural zero costs.
"""
__version__ = "1.0.0"
