# Banach space-valued extension verification toolkit
