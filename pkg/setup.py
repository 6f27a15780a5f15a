#!/usr/bin/env python
"""
Package metadata for narrated_vmr.
"""

import os
import re
import sys
from pathlib import Path

from setuptools import find_packages, setup

# "torch>=2.4" -> ("torch", ">=2.4"); extras stay part of the name.
REQUIREMENT_LINE = re.compile(r"([a-zA-Z0-9\-_.]+(?:\[[a-zA-Z0-9\-_.,\s]+\])?)([<>=!~][^#\s]+)?")


def get_version(*file_paths):
    """
    Extract the version string from the file.

    Input:
     - file_paths: relative path fragments to file with
                   version string
    """
    filename = os.path.join(os.path.dirname(__file__), *file_paths)
    with open(filename, encoding="utf8") as version_file:
        version_match = re.search(r"^__version__ = ['\"]([^'\"]*)['\"]", version_file.read(), re.M)
    if version_match:
        return version_match.group(1)
    raise RuntimeError("Unable to find version string.")


def is_requirement(line):
    """
    Return True if the requirement line is a package requirement.

    Returns:
        bool: True if the line is not blank, a comment,
        a URL, or an included file
    """
    return bool(line and line.strip() and not line.startswith(("-r", "#", "-e", "git+", "-c")))


def _add_requirement(line, requirements, add_if_not_present):
    match = REQUIREMENT_LINE.match(line.strip())
    if not match:
        return
    package, constraint = match.group(1), match.group(2)
    existing = requirements.get(package)
    if existing and constraint and existing != constraint:
        raise RuntimeError(
            f'Multiple constraint definitions found for {package}: "{existing}" and "{constraint}". '
            f"Combine them into one location."
        )
    if add_if_not_present or package in requirements:
        requirements[package] = constraint or existing


def load_requirements(*requirements_paths):
    """
    Load the requirements named in the given .in files.

    Version constraints from ``-c`` files referenced by those files are
    applied to the packages they name; packages only mentioned in a
    constraints file are not added.
    """
    requirements = {}
    constraint_files = set()
    for path in requirements_paths:
        with open(path, encoding="utf8") as reqs:
            for line in reqs:
                if is_requirement(line):
                    _add_requirement(line, requirements, True)
                elif line.startswith("-c") and not line.startswith("-c http"):
                    constraint_name = line.split("#")[0].replace("-c", "", 1).strip()
                    constraint_files.add(os.path.join(os.path.dirname(path), constraint_name))

    for constraint_file in constraint_files:
        with open(constraint_file, encoding="utf8") as reader:
            for line in reader:
                if is_requirement(line):
                    _add_requirement(line, requirements, False)

    return [f"{package}{constraint or ''}" for package, constraint in sorted(requirements.items())]


VERSION = get_version("narrated_vmr", "__init__.py")

if sys.argv[-1] == "tag":
    print("Tagging the version on github:")
    os.system("git tag -a %s -m 'version %s'" % (VERSION, VERSION))
    os.system("git push --tags")
    sys.exit()

README = (Path(__file__).parent / "README.rst").read_text(encoding="utf8")
CHANGELOG = (Path(__file__).parent / "CHANGELOG.rst").read_text(encoding="utf8")

setup(
    name="narrated_vmr",
    version=VERSION,
    description="Video moment retrieval enhanced with frame narratives from a multimodal language model",
    long_description=README + "\n\n" + CHANGELOG,
    packages=find_packages(
        include=["narrated_vmr", "narrated_vmr.*"],
        exclude=["*tests"],
    ),
    include_package_data=True,
    package_data={"narrated_vmr": ["config/profiles/*/*.json"]},
    install_requires=load_requirements("requirements/base.in"),
    python_requires=">=3.10",
    license="AGPL 3.0",
    zip_safe=False,
    keywords="Python video moment retrieval narration",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: GNU Affero General Public License v3 or later (AGPLv3+)",
        "Natural Language :: English",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
    ],
    entry_points={
        "console_scripts": [
            "narrated-vmr = narrated_vmr.cli:main",
        ],
    },
)
