import os

from setuptools import Extension, setup

# The compiled kernel is an optional speed-up: the package imports a pure
# Python twin when the extension is absent, so a build without Cython (or
# with PWL_ROTOR_PURE_BUILD set) still yields a working install.
extensions = []
if not os.environ.get("PWL_ROTOR_PURE_BUILD"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        extensions = cythonize(
            [
                Extension(
                    "pwlrotor._kernel",
                    ["src/pwlrotor/_kernel.pyx"],
                    # -ffp-contract=off keeps the arithmetic bit-identical
                    # with the pure Python fallback (no FMA contraction).
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=extensions)
