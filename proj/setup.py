from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

core_sources = [
    "src/expr.cpp",
    "src/format.cpp",
    "src/lexer.cpp",
    "src/parse_expr.cpp",
    "src/parse_model.cpp",
    "src/parse_property.cpp",
    "src/bind.cpp",
    "src/ctmc.cpp",
    "src/numerics.cpp",
    "src/engine.cpp",
    "src/sim.cpp",
    "src/ram.cpp",
]

setup(
    ext_modules=[
        Pybind11Extension(
            "ctmck._ctmck",
            sources=core_sources + ["python/src/bindings.cpp"],
            include_dirs=["include"],
            cxx_std=20,
        )
    ],
    cmdclass={"build_ext": build_ext},
)
