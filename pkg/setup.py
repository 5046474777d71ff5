from setuptools import setup, find_packages

setup(
    name="bandrmt",
    version="0.1.0",
    packages=find_packages(include=("src", "src.*")),
    entry_points={"console_scripts": ["bandrmt = src.cli:main"]},
)
