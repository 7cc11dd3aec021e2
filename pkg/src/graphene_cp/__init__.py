"""Casimir-Polder forces between rubidium atoms and suspended graphene."""

__version__ = "0.1.0"
