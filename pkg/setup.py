from setuptools import setup, find_packages


with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="unison-sim",
    version="0.1.0",
    description="Simulator and trace verifier for self-stabilizing asynchronous unison, with a synchronizer for synchronous algorithms.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering",
        "Topic :: System :: Distributed Computing",
    ],
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    install_requires=[
        "click>=8.0.0,<9.0.0",
        "rich>=10.0.0",
        "networkx>=2.6",
    ],
    entry_points={
        "console_scripts": [
            "unison-sim=unison_sim.cli.main:cli",
        ],
    },
    python_requires=">=3.8",
    keywords=[
        "self-stabilization",
        "unison",
        "distributed-algorithms",
        "synchronizer",
        "simulation",
        "verification",
    ],
)
