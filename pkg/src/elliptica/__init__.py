"""Nonlocal elliptic image restoration."""
