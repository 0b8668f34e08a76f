"""
File formats: CSV tables and static SVG figures.
"""
