# Configuration file for the Sphinx documentation builder.
#
# For the full list of built-in configuration values, see the documentation:
# https://www.sphinx-doc.org/en/master/usage/configuration.html

# -- Project information -----------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#project-information

project = "unison-sim"
copyright = "2026, unison-sim contributors"
author = "unison-sim contributors"
release = "v0.1.0"

html_title = "unison-sim: Self-Stabilizing Unison"
html_short_title = "unison-sim"

# -- General configuration ---------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#general-configuration

extensions = ["sphinx_copybutton"]

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]


# -- Options for HTML output -------------------------------------------------
# https://www.sphinx-doc.org/en/master/usage/configuration.html#options-for-html-output


html_theme = "furo"

pygments_style = "friendly"
pygments_dark_style = "github-dark"

html_meta = {
    "description": "Simulate, replay and verify the self-stabilizing asynchronous unison protocol, and run synchronous algorithms on top of it.",
    "keywords": "self-stabilization, asynchronous unison, synchronizer, distributed algorithms, simulation",
    "viewport": "width=device-width, initial-scale=1",
}
