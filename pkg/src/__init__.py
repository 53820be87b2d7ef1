"""
Control-Flow Error Detectors - Source Package
Détecteurs d'erreurs de flot de contrôle (réseaux de Petri et séquences d'états)
pour circuits simulés au cycle près.
"""

__version__ = "1.0.0"
