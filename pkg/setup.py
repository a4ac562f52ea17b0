#!/usr/bin/env python
# -*- coding: utf-8 -*-
from setuptools import setup

install_requires = [
    "attrs>=21.2.0",
    "click>=7.1.2",
    "numpy>=1.20.0",
    "Pillow>=8.3.1",
    "pluggy>=0.13.1",
    "scipy>=1.7.0",
]

extras_require = {}

tests_require = ["pytest", "pytest-cov", "pytest-mock", "coverage"]

setup(
    install_requires=install_requires,
    extras_require=extras_require,
    tests_require=tests_require,
)
