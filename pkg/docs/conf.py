extensions = ["sphinx_ape"]
project = "borel-invariants"
