from setuptools import setup, find_packages

version = "0.1.0"

with open("requirements.txt") as f:
    required_packages = f.read().splitlines()

setup(
    name="pystrat-wave",
    version=version,
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=required_packages,
    license="MIT",
    description="Solvers and symmetry diagnostics for steady stratified periodic water waves",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    package_data={"pystrat_wave": ["py.typed"]},
    include_package_data=True,
    entry_points={"console_scripts": ["pystrat-wave=pystrat_wave._cli:main"]},
)
