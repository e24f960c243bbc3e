"""package data"""
