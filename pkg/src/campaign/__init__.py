"""
Package du moteur d'injection de fautes.
"""
