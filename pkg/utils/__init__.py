"""
Wronski Count - Utilities Package

Enums, errors, configuration and logging helpers.
"""
