"""
Model core: data containers, moment conversions, parameters and densities.
"""
