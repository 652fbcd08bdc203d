"""Graph core and the wsatlab services"""
