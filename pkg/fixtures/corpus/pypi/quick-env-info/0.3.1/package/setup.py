from setuptools import setup, find_packages

setup(
    name="quick-env-info",
    version="0.3.1",
    packages=find_packages(),
    description="Tiny environment summary helpers",
)
