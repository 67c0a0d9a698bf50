"""Minimum rank of sign pattern matrices via 1-separations."""
