# Box pivoting simulator package
