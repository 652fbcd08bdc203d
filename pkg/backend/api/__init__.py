"""FastAPI routers, one per service"""
