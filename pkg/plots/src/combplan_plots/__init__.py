from .figures import FigureError, FigureSpec, render

__all__ = ["FigureError", "FigureSpec", "render"]
