#pragma once

#include "rankattack/backend.hpp"
#include "rankattack/blackbox.hpp"
#include "rankattack/corpus.hpp"
#include "rankattack/embedding.hpp"
#include "rankattack/error.hpp"
#include "rankattack/mlp.hpp"
#include "rankattack/ranking.hpp"
#include "rankattack/remote.hpp"
#include "rankattack/text.hpp"
#include "rankattack/whitebox.hpp"
