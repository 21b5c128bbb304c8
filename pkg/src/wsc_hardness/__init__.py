"""Hardness regression for Winograd schema halves."""
