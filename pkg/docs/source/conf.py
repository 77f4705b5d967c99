# Configuration file for Sphinx to build our documentation to HTML.
#
# Configuration reference: https://www.sphinx-doc.org/en/master/usage/configuration.html
#
import datetime
import sys
from os.path import dirname

# -- Project information -----------------------------------------------------
# ref: https://www.sphinx-doc.org/en/master/usage/configuration.html#project-information
#
project = "embodic"
copyright = f"{datetime.date.today().year}, embodic contributors"
author = "embodic contributors"


# -- Setup system path for autodoc extensions --------------------------------
#
# autodoc generates reference/, so the repo root must be importable.
#
git_repo_root = dirname(dirname(dirname(__file__)))
sys.path.insert(0, git_repo_root)

from embodic._version import __version__  # noqa: E402

version = release = __version__


# -- General Sphinx configuration ---------------------------------------------------
# ref: https://www.sphinx-doc.org/en/master/usage/configuration.html#general-configuration
#
extensions = [
    "autodoc_traits",
    "myst_parser",
    "sphinx_copybutton",
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
]
root_doc = "index"
source_suffix = [".md", ".rst"]
default_role = "literal"
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]


# -- Options for HTML output -------------------------------------------------
# ref: https://www.sphinx-doc.org/en/master/usage/configuration.html#options-for-html-output
#
html_theme = "pydata_sphinx_theme"
html_context = {
    "doc_path": "docs/source",
}
