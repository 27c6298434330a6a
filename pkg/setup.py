"""
Setup script for the agtd package.
"""

from setuptools import setup, find_packages

setup(
    name="agtd",
    version="0.1.0",
    description="Forensics toolkit for AI-generated text detectability",
    packages=find_packages(include=["agtd*", "cli*"]),
    install_requires=[
        "levenshtein>=0.25.0",
        "matplotlib>=3.8.0",
        "nltk>=3.9.1",
        "numpy>=1.26.0",
        "pandas>=2.0.0",
        "pydantic>=2.6.0",
        "python-dotenv>=1.0.0",
        "regex>=2024.4.16",
        "rich>=13.0.0",
        "scikit-learn>=1.4.0",
        "scipy>=1.11.0",
        "tqdm>=4.66.0",
        "typer>=0.12.0",
    ],
    python_requires=">=3.11",
    entry_points={
        "console_scripts": [
            "agtd=cli.main:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
)
