#pragma once

#define SPGD_VERSION "0.1.0"
