"""Exact CohFTs from minimal classes on moduli of curves."""
