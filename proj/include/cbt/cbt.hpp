#ifndef CBT_CBT_HPP_
#define CBT_CBT_HPP_

#include "bit_vector.hpp"
#include "rank_support.hpp"
#include "sorted_set.hpp"
#include "measures.hpp"
#include "binary_trie.hpp"
#include "run_trie.hpp"
#include "intersect.hpp"
#include "reference.hpp"
#include "certify.hpp"
#include "parallel.hpp"
#include "family.hpp"
#include "report.hpp"

#endif  // CBT_CBT_HPP_
