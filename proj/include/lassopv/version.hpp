#ifndef LASSOPV_VERSION_HPP
#define LASSOPV_VERSION_HPP

#define LASSOPV_VERSION "0.1.0"

#endif
