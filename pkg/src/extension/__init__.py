# Vector-valued extension constructions
