from glob import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "noontrack._core",
    sorted(glob("src/*.cpp")) + ["python/bindings.cpp"],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(
    name="noontrack",
    version="0.1.0",
    description=(
        "Two-photon N00N phase tracking: coincidence simulation, Bayesian "
        "(phi, V) estimation, Fisher/CRB bounds and the adaptive tracking loop"
    ),
    packages=["noontrack"],
    package_dir={"noontrack": "python/noontrack"},
    ext_modules=[ext],
    cmdclass={"build_ext": build_ext},
    python_requires=">=3.9",
)
