#!/usr/bin/env python3

#
# cognite-kinetics documentation build configuration file
#
# This file is execfile()d with the current directory set to its
# containing dir.
#
import re

# -- General configuration ------------------------------------------------

extensions = ["sphinx.ext.autodoc", "sphinx.ext.napoleon", "sphinx.ext.mathjax"]

templates_path = ["_templates"]

source_suffix = ".rst"

master_doc = "index"

project = "cognite-kinetics"
copyright = "2022, Cognite AS"
author = "Sander Land"

# The short X.Y version and the full version, read from the build manifest.
version = re.search(r'^version\s*=\s*"(.*)"', open("../../pyproject.toml").read(), re.M).group(1)
release = version

language = None

exclude_patterns = []

pygments_style = "sphinx"

todo_include_todos = False

autodoc_member_order = "bysource"

# -- Options for HTML output ----------------------------------------------

html_theme = "sphinx_rtd_theme"

html_static_path = ["_static"]

html_sidebars = {"**": ["relations.html", "searchbox.html", "globaltoc.html"]}

htmlhelp_basename = "cognite-kinetics-doc"

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {}

latex_documents = [(master_doc, "cognite-kinetics.tex", "cognite-kinetics Documentation", "Cognite", "manual")]

# -- Options for manual page output ---------------------------------------

man_pages = [(master_doc, "cognite-kinetics", "cognite-kinetics Documentation", [author], 1)]
