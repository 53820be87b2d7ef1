"""
Package du noyau de simulation au cycle près.
"""
