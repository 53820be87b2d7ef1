"""
Package d'utilitaires : configuration et erreurs.
"""
