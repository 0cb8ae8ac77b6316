"""
Inflect Test Suite

Unit and integration tests for the Inflect intonation toolkit.
"""
