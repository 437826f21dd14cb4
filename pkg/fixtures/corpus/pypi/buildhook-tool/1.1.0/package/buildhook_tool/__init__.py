def stamp():
    return "built-with-stamp"
