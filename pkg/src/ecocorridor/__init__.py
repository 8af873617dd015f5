"""Eco-driving speed planning and evaluation for signalized corridors."""
