from setuptools import setup, find_packages

setup(
    name="avr-crisis",
    version="1.0.0",
    description="Multifractal area variation rate detector for crashes in price series",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(include=["src", "src.*"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.21.0",
        "pandas>=1.3.0",
        "scipy>=1.7.0",
    ],
    extras_require={
        "dev": ["pytest>=6.2.0", "hypothesis>=6.0", "black>=21.0", "flake8>=3.9.0"],
    },
    entry_points={
        "console_scripts": ["avr-crisis=src.api.cli:main"],
    },
)
