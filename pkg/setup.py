import setuptools

from sculpt import __version__

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="sculpt",
    version=__version__,
    author="Sculpt Contributors",
    description="Sculpt: simulation of measurement-driven quantum 3-SAT solvers",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=("tests", "examples")),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Natural Language :: English",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numba",
        "numpy",
        "scipy",
        "simpy",
        "networkx",
    ],
    extras_require={"dev": ["pytest", "sphinx", "sphinx_rtd_theme", "numpydoc", "black"]},
    entry_points={"console_scripts": ["sculpt = sculpt.cli:main"]},
)
