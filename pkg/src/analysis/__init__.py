"""
Package d'analyse : métriques, surface, duplication et sélection de détecteurs.
"""
