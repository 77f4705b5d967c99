import os

from setuptools import find_packages, setup

here = os.path.dirname(__file__)

with open(os.path.join(here, "requirements.txt")) as f:
    requirements = [
        line.strip() for line in f.readlines() if not line.strip().startswith("#")
    ]

with open(os.path.join(here, "README.md"), encoding="utf8") as f:
    readme = f.read()

version_ns = {}
with open(os.path.join(here, "embodic", "_version.py")) as f:
    exec(f.read(), version_ns)

setup(
    name="embodic",
    version=version_ns["__version__"],
    python_requires=">=3.10",
    license="BSD",
    # this should be a whitespace separated string of keywords, not a list
    keywords="information theory entropy morphology compressive sensing motor codes",
    description="Information-theoretic experiments on quantized bodies, efficient codes and motor codes",
    long_description=readme,
    long_description_content_type="text/markdown",
    packages=find_packages(),
    package_data={
        "embodic": ["schemas/*.json", "event-schemas/*.json", "templates/*.svg"],
        "embodic.tests": ["fixtures/*"],
    },
    include_package_data=True,
    install_requires=requirements,
    entry_points={
        "console_scripts": [
            "embodic = embodic.app:main",
        ],
    },
)
