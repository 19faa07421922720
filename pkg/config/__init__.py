"""Configuration package for kcurve."""
