"""
Package de modèles de données : signaux, vecteurs de bits et enregistrements de campagne.
"""
