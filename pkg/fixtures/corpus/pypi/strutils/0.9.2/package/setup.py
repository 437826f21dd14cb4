from setuptools import setup

setup(name="strutils", version="0.9.2", packages=["strutils"])
