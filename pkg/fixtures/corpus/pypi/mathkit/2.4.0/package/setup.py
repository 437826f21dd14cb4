from setuptools import setup

setup(name="mathkit", version="2.4.0", packages=["mathkit"])
