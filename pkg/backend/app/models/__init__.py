"""Value types: parameters, fields and results"""
