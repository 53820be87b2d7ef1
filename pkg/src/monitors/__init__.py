"""
Package des moniteurs : réseaux de Petri et séquences d'états normales.
"""
